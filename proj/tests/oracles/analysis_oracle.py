# SPDX-License-Identifier: Apache-2.0
"""Recompute the ten analysis tables from a raw check-in TSV.

Only the POI to region assignment is taken from the ingest output
(poi_regions.tsv); everything else is rebuilt here from the raw file.

usage: analysis_oracle.py CHECKINS_TSV POI_REGIONS_TSV OUT_DIR
       [--max-len 32] [--utc-offset-minutes 0] [--min-trajectories 3]
"""

import argparse
import math
import os
from collections import defaultdict

EARTH_RADIUS_KM = 6371.0088
REASONS = ["Unsatisfied Needs", "Unpopular Category", "Unpopular POI", "Other"]


def haversine(a, b):
    rad = math.pi / 180.0
    phi1, phi2 = a[0] * rad, b[0] * rad
    dphi = (b[0] - a[0]) * rad
    dlam = (b[1] - a[1]) * rad
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def read_checkins(path):
    pois, rows = {}, []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            user, poi, cat, lat, lon, ts = [x.strip() for x in line.split("\t")]
            if poi not in pois:
                pois[poi] = (float(lat), float(lon), cat)
            rows.append((user, poi, int(ts)))
    return pois, rows


def build(rows, max_len, offset_minutes, min_traj):
    # Python sort is stable, matching the input order for equal timestamps.
    rows = sorted(rows, key=lambda r: (r[0], r[2]))
    trajs = []
    cur, key = [], None
    for user, poi, ts in rows:
        local = ts + offset_minutes * 60
        k = (user, local // 86400)
        if k != key:
            if len(cur) >= 2:
                trajs.append((key[0], cur))
            cur, key = [], k
        if len(cur) < max_len:
            cur.append((poi, ts, (local % 86400) // 3600))
    if len(cur) >= 2:
        trajs.append((key[0], cur))

    by_user = defaultdict(list)
    for user, visits in trajs:
        by_user[user].append(visits)
    train = []
    for user, ts in by_user.items():
        n = len(ts)
        if n < max(3, min_traj):
            continue
        n_train = min(max(int(math.floor(0.8 * n + 1e-9)), 1), n - 2)
        train.extend((user, t) for t in ts[:n_train])
    return train


def fmt_float(x):
    if x == int(x):
        return str(int(x))
    return repr(x)


def write_table(out_dir, key, buckets, counts):
    total = sum(counts)
    lines = ["bucket,count,fraction"]
    for b, c in zip(buckets, counts):
        lines.append("%s,%d,%s" % (b, c, fmt_float(c / total if total else 0.0)))
    with open(os.path.join(out_dir, key + ".csv"), "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("checkins")
    ap.add_argument("poi_regions")
    ap.add_argument("out_dir")
    ap.add_argument("--max-len", type=int, default=32)
    ap.add_argument("--utc-offset-minutes", type=int, default=0)
    ap.add_argument("--min-trajectories", type=int, default=3)
    args = ap.parse_args()

    pois, rows = read_checkins(args.checkins)
    region = {}
    with open(args.poi_regions, encoding="utf-8") as f:
        next(f)
        for line in f:
            p, r = line.rstrip("\n").split("\t")
            region[p] = int(r)
    K = max(region.values()) + 1

    # Centres are member means in first-appearance order of the POIs.
    sums = [[0.0, 0.0, 0] for _ in range(K)]
    for p, (lat, lon, _) in pois.items():
        s = sums[region[p]]
        s[0] += lat
        s[1] += lon
        s[2] += 1
    centers = [(s[0] / s[2], s[1] / s[2]) for s in sums]

    train = build(rows, args.max_len, args.utc_offset_minutes, args.min_trajectories)
    cat = {p: v[2] for p, v in pois.items()}

    pop = defaultdict(int)
    user_regions = defaultdict(lambda: [0] * K)
    for user, t in train:
        for poi, _, _ in t:
            pop[poi] += 1
            user_regions[user][region[poi]] += 1
    cell_count = defaultdict(int)
    cell_top = {}
    for p in pois:
        cell = (region[p], cat[p])
        cell_count[cell] += pop[p]
        if cell not in cell_top or pop[p] > pop[cell_top[cell]]:
            cell_top[cell] = p
    top_region = {}
    for user, counts in user_regions.items():
        best = max(counts)
        top_region[user] = counts.index(best) if best > 0 else -1

    def rank_map(counts):
        order = sorted(range(K), key=lambda r: (-counts[r], r))
        return {r: i + 1 for i, r in enumerate(order)}

    # Region visit statistics.
    per_traj, per_user, personal = [0] * K, [0] * K, [0] * K
    user_max = defaultdict(int)
    for user, t in train:
        n = len({region[p] for p, _, _ in t})
        per_traj[n - 1] += 1
        user_max[user] = max(user_max[user], n)
    for m in user_max.values():
        per_user[m - 1] += 1
    ranks = {u: rank_map(c) for u, c in user_regions.items()}
    for user, t in train:
        regs = {region[p] for p, _, _ in t}
        if len(regs) > 2:
            continue
        personal[min(ranks[user][r] for r in regs) - 1] += 1

    def reason(poi, ref):
        c = cat[poi]
        if (ref, c) not in cell_top:
            return 0
        if cell_count[(ref, c)] < cell_count[(region[poi], c)]:
            return 1
        if pop[cell_top[(ref, c)]] < pop[poi]:
            return 2
        return 3

    q2, q3 = [0] * 4, [0] * 4
    for user, t in train:
        top = top_region[user]
        for p, _, _ in t:
            if region[p] != top:
                q2[reason(p, top)] += 1

    interval, slot = [0] * 24, [0] * 6
    dist_rank, pop_rank, transition = [0] * (K - 1), [0] * K, [0] * 4
    for user, t in train:
        for k in range(1, len(t)):
            a, b = region[t[k - 1][0]], region[t[k][0]]
            if a == b:
                continue
            poi = t[k][0]
            q3[reason(poi, a)] += 1

            hours = -(-max(0, t[k][1] - t[k - 1][1]) // 3600)
            interval[min(max(hours, 1), 24) - 1] += 1
            slot[t[k - 1][2] // 4] += 1

            target = haversine(centers[a], centers[b])
            r = 1 + sum(1 for o in range(K) if o not in (a, b)
                        and (haversine(centers[a], centers[o]), o) < (target, b))
            dist_rank[r - 1] += 1

            c = cat[poi]
            mine = cell_count[(b, c)]
            r = 1 + sum(1 for o in range(K) if o != b and (o, c) in cell_top
                        and (-cell_count[(o, c)], o) < (-mine, b))
            pop_rank[r - 1] += 1

            top = top_region[user]
            transition[{(True, False): 0, (False, True): 1, (False, False): 2, (True, True): 3}[(a == top, b == top)]] += 1

    nums = lambda n: [str(i) for i in range(1, n + 1)]
    os.makedirs(args.out_dir, exist_ok=True)
    write_table(args.out_dir, "q1_regions_per_trajectory", nums(K), per_traj)
    write_table(args.out_dir, "q1_user_max_regions", nums(K), per_user)
    write_table(args.out_dir, "q1_personalized_rank", nums(K), personal)
    write_table(args.out_dir, "q2_infrequent_region_reasons", REASONS, q2)
    write_table(args.out_dir, "q3_cross_region_reasons", REASONS, q3)
    write_table(args.out_dir, "q4_interval_hours", nums(24), interval)
    write_table(args.out_dir, "q4_time_slot", ["%d-%d" % (4 * s, 4 * s + 4) for s in range(6)], slot)
    write_table(args.out_dir, "q5_distance_rank", nums(K - 1), dist_rank)
    write_table(args.out_dir, "q5_popularity_rank", nums(K), pop_rank)
    write_table(args.out_dir, "q5_transition", ["fre->inf", "inf->fre", "inf->inf", "fre->fre"], transition)


if __name__ == "__main__":
    main()
