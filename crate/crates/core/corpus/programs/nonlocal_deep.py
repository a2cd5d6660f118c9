def a():
    x = 1

    def b():
        y = 10

        def c():
            nonlocal x
            x = x + y
            return x * 2

        r = c()
        return r + y

    s = b()
    print(x, s)

a()
