#!/usr/bin/env python3
"""Command-line entry point for the graph-state benchmark."""

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

from app.cli import bench

if __name__ == '__main__':
    bench()
