"""knitgrid - circuit knitting compiler and hybrid tensor network runtime"""
