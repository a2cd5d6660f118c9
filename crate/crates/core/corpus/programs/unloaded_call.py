from epython import dynamic

@dynamic(defer=True)
def later(x):
    return x

print("before")
print(later(1))
