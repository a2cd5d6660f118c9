def primes(n):
    flags = [1] * n
    flags[0] = 0
    flags[1] = 0
    i = 2
    while i * i < n:
        if flags[i] == 1:
            j = i * i
            while j < n:
                flags[j] = 0
                j += i
        i += 1
    c = 0
    for k in range(n):
        if flags[k] == 1:
            c += 1
            if c <= 10:
                print(k)
    return c

print(primes(1000))
