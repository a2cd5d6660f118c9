from epython import dynamic

@dynamic(defer=True)
def hello(n):
    print("hello", n)
    return n

def use():
    global hello
    for i in range(3):
        hello = load_function("hello")
        hello(i)
        del(hello)

use()
print("done")
