def fact(n):
    r = 1
    while n > 1:
        r = r * n
        n = n - 1
    return r

i = 0
while i <= 20:
    print(i, fact(i))
    i += 4
