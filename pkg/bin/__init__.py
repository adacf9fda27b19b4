"""ctxcodec CLI tools."""
