from epython import dynamic

@dynamic(defer=True)
def square(x):
    return x * x

@dynamic(defer=True)
def cube(x):
    return x * x * x

def main():
    global square
    global cube
    square = load_function("square")
    cube = load_function("cube")
    print(square(5), cube(3))
    del(square)
    del(cube)

main()
