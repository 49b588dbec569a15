"""Write fixtures/games/finals2017_g3.json.

Box-score lines are a reconstruction of 2017 Finals Game 3 (Golden State 118
at Cleveland 113, June 7 2017). Shot locations and times are synthetic but
consistent with the box score: each player's shots equal his FGA, made shots
his FGM, 3-point attempts his 3PA. The last 3:09 is scripted as an 11-0
Golden State run from 107-113, with Durant scoring 14 in the fourth quarter.
"""
import json
import math
import pathlib
import random

rng = random.Random(20170607)

# id, team, min, reb, ast, stl, blk, tov, pf, fgm, fga, tpm, tpa, ftm, fta
ROWS = [
    ("durant", "gsw", 44, 8, 4, 1, 1, 3, 2, 10, 18, 5, 9, 6, 6),
    ("curry", "gsw", 43, 13, 6, 2, 0, 4, 3, 7, 21, 3, 12, 9, 10),
    ("kthompson", "gsw", 42, 4, 1, 1, 0, 1, 4, 10, 16, 6, 11, 4, 4),
    ("green", "gsw", 36, 5, 3, 2, 1, 2, 5, 2, 9, 1, 4, 1, 2),
    ("pachulia", "gsw", 14, 4, 1, 0, 0, 1, 3, 1, 2, 0, 0, 0, 0),
    ("iguodala", "gsw", 30, 6, 3, 1, 1, 1, 2, 3, 5, 1, 2, 0, 0),
    ("livingston", "gsw", 12, 1, 2, 0, 0, 1, 1, 2, 4, 0, 0, 0, 0),
    ("mccaw", "gsw", 5, 0, 0, 0, 0, 0, 1, 0, 1, 0, 1, 0, 0),
    ("west", "gsw", 8, 2, 1, 0, 1, 0, 1, 4, 6, 0, 0, 0, 0),
    ("mcgee", "gsw", 6, 2, 0, 0, 1, 0, 1, 2, 3, 0, 0, 0, 0),
    ("james", "cle", 46, 11, 9, 2, 1, 4, 3, 15, 27, 3, 7, 6, 8),
    ("irving", "cle", 46, 2, 3, 1, 0, 2, 2, 16, 29, 3, 8, 3, 4),
    ("love", "cle", 38, 13, 1, 1, 0, 1, 3, 3, 6, 1, 3, 2, 2),
    ("smith", "cle", 33, 2, 1, 1, 0, 0, 3, 5, 9, 5, 8, 1, 1),
    ("tthompson", "cle", 27, 6, 1, 0, 1, 1, 4, 1, 2, 0, 0, 1, 2),
    ("korver", "cle", 24, 3, 1, 0, 0, 0, 2, 3, 4, 2, 3, 0, 0),
    ("shumpert", "cle", 15, 1, 0, 1, 0, 1, 2, 0, 1, 0, 1, 0, 0),
    ("frye", "cle", 4, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0),
    ("jefferson", "cle", 5, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    ("dwilliams", "cle", 2, 0, 0, 0, 0, 0, 0, 0, 3, 0, 0, 0, 0),
]

QUARTER = 720
CLOSE_START = 189  # 3:09 left in the fourth


def elapsed(q, clock):
    return QUARTER * (q - 1) + QUARTER - clock


def region(x, y):
    r = math.hypot(x, y)
    if r <= 4:
        return "RESTRICTED_AREA"
    if abs(x) <= 8 and y <= 19:
        return "PAINT"
    if (y <= 14 and abs(x) >= 22) or r >= 23.75:
        return "THREE_POINT"
    return "MIDRANGE"


def spot(value):
    while True:
        if value == 3:
            if rng.random() < 0.25:
                x = rng.choice([-1, 1]) * rng.uniform(22.3, 24.8)
                y = rng.uniform(0.5, 13.5)
            else:
                ang = rng.uniform(0.35, math.pi - 0.35)
                r = rng.uniform(24.0, 28.0)
                x, y = r * math.cos(ang), r * math.sin(ang)
        else:
            kind = rng.random()
            if kind < 0.4:
                ang, r = rng.uniform(0.05, math.pi - 0.05), rng.uniform(0.5, 3.8)
            elif kind < 0.7:
                ang, r = rng.uniform(0.5, math.pi - 0.5), rng.uniform(5.0, 16.0)
            else:
                ang, r = rng.uniform(0.2, math.pi - 0.2), rng.uniform(10.0, 22.5)
            x, y = r * math.cos(ang), r * math.sin(ang)
        x, y = round(x, 1), round(y, 1)
        if abs(x) > 25 or not (0 <= y <= 47):
            continue
        if (region(x, y) == "THREE_POINT") == (value == 3):
            return x, y


def shot(pid, team, q, clock, value, made, xy=None):
    x, y = xy if xy else spot(value)
    return {
        "player_id": pid, "team_id": team, "quarter": q,
        "clock_seconds_remaining": float(clock), "x_ft": x, "y_ft": y,
        "made": made, "value": value,
    }


# Durant's fourth quarter: 4-6 FG, 2-3 3PT, 4-4 FT = 14 points.
SCRIPTED_SHOTS = [
    shot("durant", "gsw", 4, 611, 3, True),
    shot("durant", "gsw", 4, 540, 2, False),
    shot("durant", "gsw", 4, 402, 2, True, (-9.4, 13.2)),
    shot("durant", "gsw", 4, 318, 3, False),
    shot("durant", "gsw", 4, 145, 2, True, (0.6, 2.1)),
    shot("curry", "gsw", 4, 75, 2, True, (-1.2, 1.9)),
    shot("durant", "gsw", 4, 45, 3, True, (4.1, 25.6)),
]
# (player, team, quarter, clock, free throws made)
SCRIPTED_FT = [
    ("durant", "gsw", 4, 236, 2),
    ("curry", "gsw", 4, 12, 2),
    ("durant", "gsw", 4, 3, 2),
]


def remaining(pid, fgm, fga, tpm, tpa, ftm):
    """Attempts left for the random part after removing scripted ones."""
    for s in SCRIPTED_SHOTS:
        if s["player_id"] != pid:
            continue
        fga -= 1
        fgm -= s["made"]
        if s["value"] == 3:
            tpa -= 1
            tpm -= s["made"]
    ftm -= sum(n for p, _, _, _, n in SCRIPTED_FT if p == pid)
    return fgm, fga, tpm, tpa, ftm


def random_time(limit_elapsed):
    while True:
        q = rng.randint(1, 4)
        clock = rng.randint(1, QUARTER - 1)
        if elapsed(q, clock) < limit_elapsed:
            return q, clock


def main():
    shots = list(SCRIPTED_SHOTS)
    ft_events = [(elapsed(q, c), team, n) for _, team, q, c, n in SCRIPTED_FT]
    box = []
    close = elapsed(4, CLOSE_START)
    for pid, team, mins, reb, ast, stl, blk, tov, pf, fgm, fga, tpm, tpa, ftm, fta in ROWS:
        points = 2 * (fgm - tpm) + 3 * tpm + ftm
        box.append({
            "player_id": pid, "team_id": team, "minutes": float(mins), "points": points,
            "rebounds": reb, "assists": ast, "steals": stl, "blocks": blk,
            "turnovers": tov, "fouls": pf, "fgm": fgm, "fga": fga, "tpm": tpm,
            "tpa": tpa, "ftm": ftm, "fta": fta,
        })
        r_fgm, r_fga, r_tpm, r_tpa, r_ftm = remaining(pid, fgm, fga, tpm, tpa, ftm)
        assert min(r_fgm, r_fga, r_tpm, r_tpa, r_ftm) >= 0, pid
        kinds = ([(3, True)] * r_tpm + [(3, False)] * (r_tpa - r_tpm)
                 + [(2, True)] * (r_fgm - r_tpm)
                 + [(2, False)] * ((r_fga - r_tpa) - (r_fgm - r_tpm)))
        for value, made in kinds:
            q, clock = random_time(close)
            if pid == "durant":
                q = rng.randint(1, 3)
            shots.append(shot(pid, team, q, clock, value, made))
        left = r_ftm
        while left:
            n = min(left, rng.choice([1, 2, 2]))
            q, clock = random_time(close)
            if pid == "durant":
                q = rng.randint(1, 3)
            ft_events.append((elapsed(q, clock), team, n))
            left -= n

    shots.sort(key=lambda s: (elapsed(s["quarter"], s["clock_seconds_remaining"]), s["player_id"]))
    events = [(elapsed(s["quarter"], s["clock_seconds_remaining"]), s["team_id"], s["value"])
              for s in shots if s["made"]] + ft_events
    by_time = {}
    for t, team, pts in events:
        home, away = by_time.get(t, (0, 0))
        by_time[t] = (home + pts, away) if team == "cle" else (home, away + pts)
    timeline = [{"elapsed_seconds": 0.0, "home_score": 0, "away_score": 0}]
    home = away = 0
    for t in sorted(by_time):
        dh, da = by_time[t]
        home, away = home + dh, away + da
        if t == 0:
            timeline[0] = {"elapsed_seconds": 0.0, "home_score": home, "away_score": away}
        else:
            timeline.append({"elapsed_seconds": float(t), "home_score": home, "away_score": away})
    timeline.append({"elapsed_seconds": 2880.0, "home_score": home, "away_score": away})
    assert (home, away) == (113, 118), (home, away)
    at_close = [s for s in timeline if s["elapsed_seconds"] <= close][-1]
    assert (at_close["home_score"], at_close["away_score"]) == (113, 107), at_close

    game = {
        "schema_version": "1.0",
        "meta": {
            "game_id": "2017-finals-g3", "home_team_id": "cle", "away_team_id": "gsw",
            "date": "2017-06-07", "final_home": 113, "final_away": 118, "n_periods": 4,
        },
        "box_score": box,
        "shots": shots,
        "timeline": timeline,
    }
    out = pathlib.Path(__file__).resolve().parents[1] / "games" / "finals2017_g3.json"
    out.parent.mkdir(exist_ok=True)
    out.write_text(json.dumps(game, indent=2) + "\n")
    q4 = [s for s in shots if s["player_id"] == "durant" and s["quarter"] == 4]
    print(f"wrote {out}: {len(shots)} shots, {len(timeline)} samples, durant q4 shots {len(q4)}")
    for q in range(1, 5):
        last = [s for s in timeline if s["elapsed_seconds"] <= 720 * q][-1]
        print(f"  end of Q{q}: CLE {last['home_score']} GSW {last['away_score']}")


main()
