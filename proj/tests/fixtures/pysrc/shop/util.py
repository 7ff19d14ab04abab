import json


def dump(obj):
    return json.dumps(obj, sort_keys=True)


def log(msg):
    print(format_line(msg))


def format_line(msg):
    return "[shop] " + str(msg)
