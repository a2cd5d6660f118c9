def touch(n):
    v = [1] * 4
    for i in range(n):
        print(v[i])

touch(6)
print("unreachable")
