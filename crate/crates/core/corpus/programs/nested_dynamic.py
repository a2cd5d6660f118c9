from epython import dynamic

@dynamic
def outer(n):
    acc = 0

    def step(i):
        nonlocal acc
        acc = acc + i * n

    for i in range(n):
        step(i)
    return acc

print(outer(4), outer(10))
