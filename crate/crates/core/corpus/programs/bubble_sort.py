def sort(n):
    v = [0] * n
    seed = 7
    for i in range(n):
        seed = (seed * 1103 + 12345) % 1000
        v[i] = seed
    print(v)
    for i in range(n):
        for j in range(n - 1 - i):
            if v[j] > v[j + 1]:
                t = v[j]
                v[j] = v[j + 1]
                v[j + 1] = t
    print(v)

sort(12)
