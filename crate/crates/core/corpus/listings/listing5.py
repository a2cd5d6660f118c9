from epython import dynamic

total = 0


@dynamic(defer=True)
def add(x, y):
    return x + y


add = load_function("add")
total = add(3, 4)
print(total)
