"""Writes the synthetic CRG fixture corpus: messages.jsonl, sidecar.jsonl, embeddings.txt.

Vocabulary is skewed by gender and age group so every audit family has signal.
Seeded; rerunning reproduces the committed files byte for byte.
"""

import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent

GENDERS = ["Male", "Female"]
AGES = [
    "Young Adult (18-24)",
    "Early Working Age Group (25-44)",
    "Late Working Age Group (45-64)",
    "Senior (65+)",
]
STANCES = ["pro-energy", "clean-energy"]
REGIONS = ["Northeast", "Southeast", "Midwest", "Southwest", "West"]
THEMES = {
    "pro-energy": ["Economy", "Climate Solution", "Pragmatism", "Patriotism", "Against climate policy"],
    "clean-energy": ["Economy", "Future Generation", "Environmental", "Human health", "Animals", "Support climate policy"],
}

ADJ = {
    "Male": ["strong", "confident", "ambitious", "bold", "independent"],
    "Female": ["caring", "kind", "gentle", "compassionate", "warm"],
    "Young Adult (18-24)": ["young", "vibrant", "dynamic", "creative", "modern"],
    "Early Working Age Group (25-44)": ["active", "driven", "productive", "efficient", "modern"],
    "Late Working Age Group (45-64)": ["stable", "reliable", "experienced", "thoughtful", "respected"],
    "Senior (65+)": ["wise", "traditional", "frail", "senior", "safe"],
    "shared": ["clean", "green", "local", "better"],
}
NOUN = {
    "Male": ["leadership", "career", "business", "innovation", "power"],
    "Female": ["family", "children", "community", "home", "health"],
    "Young Adult (18-24)": ["future", "opportunity", "technology", "growth", "potential"],
    "Early Working Age Group (25-44)": ["career", "growth", "innovation", "skill", "opportunity"],
    "Late Working Age Group (45-64)": ["stability", "heritage", "family", "savings", "security"],
    "Senior (65+)": ["grandchildren", "legacy", "tradition", "wisdom", "health"],
    "shared": ["energy", "planet", "air", "neighbors"],
}
HIGH = ["lead", "build", "protect", "create", "drive", "shape", "win"]
LOW = ["need", "depend", "rely", "hope", "struggle", "endure"]
NEUTRAL_VERBS = ["join", "explore", "imagine", "consider"]
CERTAIN = ["will", "must"]
HEDGE = ["might", "could", "may"]

EMOTIONS = 28
BOOST = {"Male": 21, "Female": 5, "Young Adult (18-24)": 20, "Senior (65+)": 15}


def tok(surface, pos, initial=False):
    return {"surface": surface, "lower": surface.lower(), "pos": pos, "sent_initial": initial}


def build_message(rng, gender, age, bias):
    adj = lambda: rng.choice(ADJ[gender] + ADJ[age] + ADJ["shared"])
    noun = lambda: rng.choice(NOUN[gender] + NOUN[age] + NOUN["shared"])
    male = gender == "Male"
    tokens, imperatives = [], 0
    # imperative opener
    if rng.random() < (0.7 if male else 0.45) + bias:
        verb = rng.choice(HIGH if rng.random() < 0.7 else NEUTRAL_VERBS)
        tokens += [tok(verb.capitalize(), "VERB", True), tok("a", "DET"), tok(adj(), "ADJ"),
                   tok(noun(), "NOUN"), tok(".", "PUNCT")]
        imperatives += 1
    # modal sentence; about 30% of messages carry no agency verb at all
    if rng.random() < 0.7:
        pool = HIGH if rng.random() < (0.65 if male else 0.4) else LOW
        verb = rng.choice(pool)
    else:
        verb = rng.choice(NEUTRAL_VERBS)
    modal = rng.choice(CERTAIN if rng.random() < (0.7 if male else 0.35) else HEDGE)
    tokens += [tok("We", "PRON", True), tok(modal, "AUX"), tok(verb, "VERB"), tok(adj(), "ADJ"),
               tok(noun(), "NOUN"), tok("for", "ADP"), tok("our", "PRON"), tok(noun(), "NOUN"),
               tok(".", "PUNCT")]
    tokens += [tok("Your", "PRON", True), tok(adj(), "ADJ"), tok(noun(), "NOUN"), tok("matters", "VERB"),
               tok("for", "ADP"), tok("the", "DET"), tok(noun(), "NOUN"), tok(".", "PUNCT")]
    text = ""
    for t in tokens:
        if t["pos"] == "PUNCT" or not text:
            text += t["surface"]
        else:
            text += " " + t["surface"]
    if tokens[0]["sent_initial"] and rng.random() < 0.3:
        text += " Act now!"
        tokens += [tok("Act", "VERB", True), tok("now", "ADV"), tok("!", "PUNCT")]
        imperatives += 1
    return text, tokens, imperatives


def emotions(rng, gender, age):
    w = [rng.random() * 0.2 for _ in range(EMOTIONS)]
    w[27] += 1.0
    for label in (gender, age):
        if label in BOOST:
            w[BOOST[label]] += 0.6 + rng.random() * 0.2
    total = sum(w)
    p = [round(x / total, 12) for x in w]
    p[27] = round(1.0 - sum(p[:27]), 12)
    return p


def clip(x):
    return min(1.0, max(0.0, x))


def main():
    rng = random.Random(20240607)
    messages, sidecars = [], []
    n = 0
    for model, bias in (("fixture-a", 0.0), ("fixture-b", -0.1)):
        for g in GENDERS:
            for a in AGES:
                for s in STANCES:
                    for r in REGIONS:
                        for t in THEMES[s]:
                            n += 1
                            mid = f"fx-{n:04d}"
                            text, tokens, imps = build_message(rng, g, a, bias)
                            messages.append({
                                "id": mid, "model_id": model, "setting": "CRG", "gender": g,
                                "age_group": a, "stance": s, "region": r, "theme": t, "text": text,
                            })
                            formal = rng.gauss(0.8 if g == "Male" else 0.6, 0.05)
                            rec = {
                                "message_id": mid,
                                "tokens": tokens,
                                "formality_prob": round(clip(formal), 6),
                                "emotion_probs": emotions(rng, g, a),
                                "sentiment": round(rng.uniform(-0.3, 0.9), 4),
                            }
                            # a few records leave imperatives to the built-in heuristic
                            if n % 17:
                                rec["imperative_count"] = imps
                            sidecars.append(rec)

    with open(HERE / "messages.jsonl", "w", encoding="utf-8") as f:
        for m in messages:
            f.write(json.dumps(m, ensure_ascii=False) + "\n")
    with open(HERE / "sidecar.jsonl", "w", encoding="utf-8") as f:
        for rec in sidecars:
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")

    # embeddings: two latent directions (agentic/communal, young/old) plus noise
    dim = 16
    axes = [[rng.gauss(0, 1) for _ in range(dim)] for _ in range(2)]
    load = {}
    for w in ADJ["Male"] + NOUN["Male"] + HIGH:
        load[w] = (1.0, 0.0)
    for w in ADJ["Female"] + NOUN["Female"] + LOW:
        load[w] = (-1.0, 0.0)
    for key, y in (("Young Adult (18-24)", 1.0), ("Early Working Age Group (25-44)", 0.6),
                   ("Late Working Age Group (45-64)", -0.6), ("Senior (65+)", -1.0)):
        for w in ADJ[key] + NOUN[key]:
            x = load.get(w, (0.0, 0.0))[0]
            load[w] = (x, y)
    attrs = {
        (1.0, 0.0): ["executive", "management", "professional", "corporation", "salary", "office", "business",
                     "career", "authority", "command", "control", "power", "leader", "ambitious", "competitive",
                     "confident", "powerful", "independent"],
        (-1.0, 0.0): ["home", "parents", "children", "family", "cousins", "marriage", "wedding", "relatives",
                      "mother", "wife", "nurture", "care", "help", "support", "comfort", "together", "community",
                      "gentle", "kind", "compassionate", "friendly"],
        (0.0, 1.0): ["creative", "novel", "dynamic", "future", "progressive", "pioneering", "growth", "innovation",
                     "vibrant", "active", "fast", "adventurous", "wild"],
        (0.0, -1.0): ["heritage", "custom", "stability", "continuity", "experience", "wisdom", "established",
                      "legacy", "root", "wise", "seasoned", "knowledgeable", "reliable", "thoughtful"],
    }
    for l, words in attrs.items():
        for w in words:
            load.setdefault(w, l)
    for w in ADJ["shared"] + NOUN["shared"] + NEUTRAL_VERBS + ["matters"]:
        load.setdefault(w, (0.0, 0.0))
    with open(HERE / "embeddings.txt", "w", encoding="utf-8") as f:
        f.write(f"{len(load)} {dim}\n")
        for w in sorted(load):
            x, y = load[w]
            v = [x * axes[0][i] + y * axes[1][i] + rng.gauss(0, 0.3) for i in range(dim)]
            f.write(w + " " + " ".join(f"{c:.6f}" for c in v) + "\n")


if __name__ == "__main__":
    main()
