class Cart:
    def __init__(self, items=None):
        self.items = list(items or [])

    def total(self):
        return sum(price(i) for i in self.items)


def price(item):
    return round(item["cost"] * tax_rate(item), 2)


def tax_rate(item):
    # flat rate for taxed goods
    return 1.2 if item.get("taxed") else 1.0
