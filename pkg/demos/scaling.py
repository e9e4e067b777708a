"""Cost scaling in the number of features.

The factorized model stores per-feature bases and latent blocks, so both
fitting time and storage should grow linearly in p while the number of
modeled pairs grows quadratically.
"""

from math import comb

from ahofm.bench import bench

rows = bench(p_list=[3, 6, 12], n_list=[6000], factors=5, epochs=3, repeats=3,
             seed=0)

print("%4s %8s %12s %14s %10s" % ("p", "pairs", "median sec", "storage bytes",
                                  "bytes/p"))
for p, n, seconds, peak in rows:
    print("%4d %8d %12.3f %14d %10.0f" % (p, comb(p, 2), seconds, peak, peak / p))

base = rows[0]
print("\nrelative to p=%d:" % base[0])
for p, n, seconds, peak in rows[1:]:
    print("  p=%2d: %4.1fx features, %4.2fx time, %4.2fx storage"
          % (p, p / base[0], seconds / base[2], peak / base[3]))
