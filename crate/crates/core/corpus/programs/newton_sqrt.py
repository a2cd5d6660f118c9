def sqrt(x):
    g = x / 2.0
    for i in range(30):
        g = (g + x / g) / 2.0
    return g

print(sqrt(2.0))
print(sqrt(1e6))
print(sqrt(0.25))
