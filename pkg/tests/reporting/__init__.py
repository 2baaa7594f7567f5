"""报告生成模块测试"""
