s = 0
for i in range(20):
    if i % 3 == 0:
        continue
    if i > 15:
        break
    s += i
print(s)
k = 0
while 1:
    k += 1
    if k == 7:
        break
print(k)
for i in range(10, 0, -3):
    print(i)
