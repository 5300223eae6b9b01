# Utility Module