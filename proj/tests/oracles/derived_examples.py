"""Direct evaluations of the worked examples frozen into the unit tests."""
import math

R = 6371.0088


def hav(a, b):
    (lon1, lat1), (lon2, lat2) = [(math.radians(x), math.radians(y)) for x, y in (a, b)]
    s = math.sin((lat2 - lat1) / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    return 2 * R * math.asin(math.sqrt(s))


def entropy(counts):
    n = sum(counts)
    return -sum(c / n * math.log(c / n) for c in counts if c)


print("entropy {1,1,2}", repr(entropy([1, 1, 2])))
print("entropy {5,5}", repr(entropy([5, 5])))

# Two towers 2 km apart on a meridian, two visits each: centroid is the midpoint.
dlat = math.degrees(2.0 / R)
a, b = (90.4, 23.75), (90.4, 23.75 + dlat)
mid = (90.4, 23.75 + dlat / 2)
rg = math.sqrt((2 * hav(a, mid) ** 2 + 2 * hav(b, mid) ** 2) / 4)
print("tower offset deg", repr(dlat), "r_g", repr(rg))

d1, d2 = hav((0, 0.5), (0, 0)), hav((0, 0.5), (0, 2))
w1, w2 = d1 ** -2, d2 ** -2
print("idw", repr((w1 * 10 + w2 * 20) / (w1 + w2)))

amounts, days = [10, 10, 20], 30
m = sum(amounts) / len(amounts)
print("topup mean", repr(m), "lowest", repr(2 / 3), "highest", repr(1 / 3), "speed", repr(sum(amounts) / days))
print("sens", repr(17 / 24), "spec", repr(210 / 276))
print("stratified 68 positives at 0.75:", round(0.75 * 68), 68 - round(0.75 * 68))
