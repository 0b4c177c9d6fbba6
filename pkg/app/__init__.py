"""
tuGEMM: симулятор и модель задержки temporal-unary GEMM
"""
