from .models import Cart, price
from . import util


def checkout(items):
    cart = Cart(items)
    util.log("checkout")
    return finalize(cart)


def finalize(cart):
    util.log(util.dump({"total": cart.total()}))
    return cart.total()
