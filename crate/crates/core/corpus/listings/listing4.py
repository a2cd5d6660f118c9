from epython import dynamic

total = 0


@dynamic
def add(x, y):
    return x + y


total = add(3, 4)
print(total)
