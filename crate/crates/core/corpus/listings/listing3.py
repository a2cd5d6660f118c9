total = 0


def add(x, y):
    return x + y


total = add(3, 4)
print(total)
