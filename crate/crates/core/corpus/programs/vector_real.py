def mean(n):
    v = [0.0] * n
    for i in range(n):
        v[i] = i * 0.5
    s = 0.0
    for i in range(n):
        s = s + v[i]
    print(v)
    return s / n

print(mean(8))
