def is_even(n):
    if n == 0:
        return 1
    return is_odd(n - 1)

def is_odd(n):
    if n == 0:
        return 0
    return is_even(n - 1)

def gcd(a, b):
    if b == 0:
        return a
    return gcd(b, a % b)

print(is_even(10), is_odd(7), is_even(7))
print(gcd(1071, 462), gcd(17, 5))
