total = 0
calls = 0

def add(v):
    global total
    global calls
    total = total + v
    calls = calls + 1

for i in range(1, 11):
    add(i)
print(total, calls)
