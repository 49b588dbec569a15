"""Write fixtures/lexicon/finals2017.json: both 2017 Finals rosters, coaches, referees."""
import json
import pathlib

GSW = [
    ("curry", "Stephen Curry", ["Curry", "Steph", "Steph Curry"]),
    ("durant", "Kevin Durant", ["Durant", "KD"]),
    ("kthompson", "Klay Thompson", ["Klay"]),
    ("green", "Draymond Green", ["Green", "Draymond"]),
    ("pachulia", "Zaza Pachulia", ["Pachulia", "Zaza"]),
    ("iguodala", "Andre Iguodala", ["Iguodala"]),
    ("livingston", "Shaun Livingston", ["Livingston"]),
    ("mccaw", "Patrick McCaw", ["McCaw"]),
    ("west", "David West", []),
    ("mcgee", "JaVale McGee", ["McGee"]),
    ("clark", "Ian Clark", []),
    ("barnes", "Matt Barnes", ["Barnes"]),
    ("looney", "Kevon Looney", ["Looney"]),
    ("mcadoo", "James Michael McAdoo", ["McAdoo"]),
    ("damjones", "Damian Jones", []),
]
CLE = [
    ("james", "LeBron James", ["LeBron", "James"]),
    ("irving", "Kyrie Irving", ["Irving", "Kyrie"]),
    ("love", "Kevin Love", ["Love"]),
    ("smith", "J.R. Smith", ["Smith", "JR Smith"]),
    ("tthompson", "Tristan Thompson", ["Tristan"]),
    ("korver", "Kyle Korver", ["Korver"]),
    ("shumpert", "Iman Shumpert", ["Shumpert"]),
    ("frye", "Channing Frye", ["Frye"]),
    ("jefferson", "Richard Jefferson", ["Jefferson"]),
    ("dwilliams", "Deron Williams", ["Deron"]),
    ("derwilliams", "Derrick Williams", []),
    ("dahjones", "Dahntay Jones", []),
    ("jjones", "James Jones", []),
    ("tavares", "Edy Tavares", ["Tavares"]),
    ("felder", "Kay Felder", ["Felder"]),
]
TEAMS = [
    ("gsw", "Golden State Warriors", ["Warriors", "Golden State"]),
    ("cle", "Cleveland Cavaliers", ["Cavaliers", "Cavalier", "Cavs", "Cleveland"]),
]
COACHES = [
    ("kerr", "Steve Kerr", ["Kerr"], "gsw"),
    ("mbrown", "Mike Brown", [], "gsw"),
    ("lue", "Tyronn Lue", ["Lue"], "cle"),
]
REFEREES = [
    ("ref_callahan", "Mike Callahan", []),
    ("ref_malloy", "Ed Malloy", []),
    ("ref_capers", "James Capers", []),
]

entities = []
for tid, name, aliases in TEAMS:
    entities.append({"id": tid, "name": name, "kind": "TEAM", "aliases": aliases})
for team, roster in (("gsw", GSW), ("cle", CLE)):
    for pid, name, aliases in roster:
        entities.append({"id": pid, "name": name, "kind": "PLAYER", "aliases": aliases, "team": team})
for cid, name, aliases, team in COACHES:
    entities.append({"id": cid, "name": name, "kind": "COACH", "aliases": aliases, "team": team})
for rid, name, aliases in REFEREES:
    entities.append({"id": rid, "name": name, "kind": "REFEREE", "aliases": aliases})

out = pathlib.Path(__file__).resolve().parents[1] / "lexicon" / "finals2017.json"
out.parent.mkdir(exist_ok=True)
out.write_text(json.dumps({"entities": entities}, indent=2) + "\n")
print(f"wrote {out} ({len(entities)} entities)")
