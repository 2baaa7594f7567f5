"""Scripts tests package"""
