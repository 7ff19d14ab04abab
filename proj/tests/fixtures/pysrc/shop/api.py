import shop.checkout
from shop.util import log as audit


def handle(request):
    audit("request")
    result = shop.checkout.checkout(request["items"])
    return respond(result)


def respond(payload):
    def wrap(value):
        return {"data": value}
    return wrap(payload)
