x = 3
y = 2.5
print("x =", x, "y =", y)
print(-x, -y)
if not x == 3 or y > 2.0:
    print("branch", x)
print(0.0, -0.0, 100.0, 1e16, 1.25e-5)
