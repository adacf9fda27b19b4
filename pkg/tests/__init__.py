"""
Test suite for ctxcodec.
"""
