a = 17
b = -5
print(a + b, a - b, a * b)
print(a // b, a % b, -a // 5, -a % 5)
print(a // 5, a % 5)
c = 0
for i in range(10):
    c += i * i
print(c)
