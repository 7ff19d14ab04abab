"""Order processing."""

from app.text import clean, fold, tokens


def parse(raw):
    return tokens(clean(raw))


def validate(items):
    return bool(items) and all(items)


def normalize(item):
    return fold(clean(item))


def transform(items):
    return [normalize(i) for i in items]


def process(raw):
    items = parse(clean(raw))
    if validate(items):
        return transform(items)
    return []
