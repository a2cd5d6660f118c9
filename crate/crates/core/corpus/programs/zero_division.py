def ratio(a, b):
    return a // b

print(ratio(9, 3))
print(ratio(1, 0))
print("unreachable")
