def clean(s):
    return s.strip()


def tokens(s):
    return s.split()


def fold(s):
    return s.casefold()
