def go(n):
    v = [0] * n
    for i in range(n):
        v[i] = i * 3
    print(v)
    print(len(v))
    s = 0
    for i in range(len(v)):
        s += v[i]
    print(s)

go(6)
w = [5, 4, 3]
w[1] = 40
print(w)
