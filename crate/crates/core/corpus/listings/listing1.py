flag = 0
r = 0.0


def outer():
    a = 1
    b = 2.0
    z = complex(0.0, 0.0)

    def inner():
        nonlocal z
        z.real = 4.3

    inner()
    print(z)


def fill(i):
    v = [0] * 10
    v[i] = 42
    print(v)


def l1():
    def l2():
        def l3():
            def l4():
                global r
                r = 10.0

            l4()

        l3()

    l2()


outer()
fill(3)
l1()
print(r)
