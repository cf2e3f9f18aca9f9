#!/usr/bin/env python3
"""Generate the bundled issue-tracker corpus (data/se_issues.csv).

Each issue mixes a main theme, a secondary theme, generic tracker chatter and
a few one-off identifiers, so the vocabulary has a long rare tail like real
issue text. Output is deterministic for a given --seed.
"""

import argparse
import csv
import random
import string

THEMES = {
    "ui": "button window dialog render layout click toolbar screen widget font scroll panel",
    "database": "database query table schema migration index transaction column sql row postgres cursor",
    "network": "network socket timeout proxy connection packet latency dns request router bandwidth retry",
    "auth": "login password token session oauth credential account permission user signin logout role",
    "build": "build compile linker gradle maven compiler makefile artifact dependency toolchain target flag",
    "memory": "memory leak heap allocation garbage pointer buffer overflow stack segfault crash dump",
    "testing": "test assertion mock fixture coverage flaky junit runner suite regression harness stub",
    "docs": "documentation readme tutorial example typo guide wiki javadoc comment manual reference chapter",
    "install": "install package installer setup upgrade uninstall pip npm wheel binary release distro",
    "performance": "slow performance benchmark profile throughput cpu optimize speed bottleneck lag spike quadratic",
    "concurrency": "thread deadlock lock race mutex concurrent async future scheduler worker pool semaphore",
    "files": "file path directory filesystem permission symlink disk folder upload download archive zip",
    "logging": "log logger verbose trace warning message output console debug level appender rotation",
    "config": "config setting option yaml property environment variable default override profile flag parameter",
    "plugin": "plugin extension module addon hook loader registry marketplace activation manifest sandbox bundle",
    "security": "security vulnerability injection xss csrf sanitize exploit certificate encryption cipher audit patch",
    "api": "api endpoint rest json response payload client server schema version deprecate route",
    "parser": "parser syntax grammar token lexer ast expression parse ambiguity precedence literal quote",
    "cache": "cache invalidation eviction redis stale expiry memoize hit miss ttl warm purge",
    "locale": "locale translation unicode encoding utf language timezone format currency date rtl",
}
DEFECT_THEMES = {"memory", "concurrency", "security", "network", "parser", "cache", "database", "files"}

CHATTER = ("issue problem please thanks version seems still work using works happens "
           "tried need also update fix help report error expected actual steps").split()
GLUE = "the a when i it is not with in on to and but after this that my we of for".split()


def identifier(rng):
    length = rng.randint(6, 11)
    head = "".join(rng.choice(string.ascii_lowercase) for _ in range(length))
    return head + str(rng.randint(0, 99)) if rng.random() < 0.4 else head


def zipf_pick(rng, words):
    weights = [1.0 / (r + 1) for r in range(len(words))]
    return rng.choices(words, weights)[0]


def issue(rng, themes, names):
    main = rng.choice(names)
    second = rng.choice([n for n in names if n != main])
    words = []
    for _ in range(rng.randint(18, 45)):
        roll = rng.random()
        if roll < 0.50:
            words.append(zipf_pick(rng, themes[main]))
        elif roll < 0.65:
            words.append(zipf_pick(rng, themes[second]))
        elif roll < 0.80:
            words.append(rng.choice(CHATTER))
        elif roll < 0.95:
            words.append(rng.choice(GLUE))
        else:
            words.append(identifier(rng))
    defect = main in DEFECT_THEMES
    if rng.random() < 0.15:
        defect = not defect
    return " ".join(words), "defect" if defect else "enhancement"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--docs", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=20160812)
    parser.add_argument("--out", default="data/se_issues.csv")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    themes = {name: words.split() for name, words in THEMES.items()}
    names = sorted(themes)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "text", "label"])
        for i in range(args.docs):
            text, label = issue(rng, themes, names)
            writer.writerow([f"issue{i + 1:04d}", text, label])


if __name__ == "__main__":
    main()
