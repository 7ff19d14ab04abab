import sys

from app.core import process


def main():
    for line in sys.stdin:
        print(process(line))


def usage():
    print("usage: app < input")
