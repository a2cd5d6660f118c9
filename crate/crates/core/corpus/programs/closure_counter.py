def run():
    count = 0

    def bump(k):
        nonlocal count
        count = count + k

    for i in range(5):
        bump(i)
    print(count)
    bump(100)
    print(count)

run()
run()
