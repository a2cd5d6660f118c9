x = 7.5
y = -2.0
print(x + y, x - y, x * y, x / y)
print(x // y, x % y)
print(1 / 3)
print(10 / 4)
z = 0.1 + 0.2
print(z)
print(1.0e20, 1.5e-7, 123456789.0)
