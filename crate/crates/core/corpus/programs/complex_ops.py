def show():
    a = complex(1.0, 2.0)
    b = complex(-0.5, 3.0)
    c = a + b
    print(c)
    d = a * b
    print(d)
    e = a - b
    print(e)
    print(d.real, d.imag)
    d.imag = 0.0
    print(d)

show()
