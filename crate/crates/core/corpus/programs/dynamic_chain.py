from epython import dynamic

@dynamic
def inc(x):
    return x + 1

@dynamic
def twice(x):
    return inc(inc(x))

def plain(x):
    return twice(x) * 10

print(plain(4))
print(twice(0))
