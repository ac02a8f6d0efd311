#!/usr/bin/env python3
"""Regenerates textmetrics_*.json with sacrebleu. Run from the repo root."""
import json
import sacrebleu
from sacrebleu.metrics import BLEU, CHRF

LATIN = {
    "name": "en-de",
    "tokenize": "13a",
    "hyps": [
        "The cat sat on the mat.",
        "Das Wetter in Berlin war heute morgen kalt.",
        "Der Rat genehmigte am Dienstag den neuen Haushalt.",
        "Wir sehen uns nächste Woche wieder!",
        "Sie öffnete das Fenster, und hörte dem Regen zu.",
        "Die Preise sind im letzten Jahr stark gestiegen.",
        "Die Straße nach Norden ist gesperrt.",
        "\"Danke\", sagte er & ging.",
        "Um 12:30 Uhr fährt die Fähre ab - pünktlich.",
        "Ein völlig anderer Satz ohne Bezug.",
    ],
    "refs": [
        [
            "The cat is sitting on the mat.",
            "Das Wetter in Berlin war heute Morgen kalt.",
            "Der Rat hat am Dienstag den neuen Haushalt genehmigt.",
            "Wir treffen uns nächste Woche wieder.",
            "Sie öffnete das Fenster und lauschte dem Regen.",
            "Die Preise stiegen im vergangenen Jahr stark an.",
            "Die Straße in den Norden ist gesperrt.",
            "\"Danke\", sagte er und ging.",
            "Die Fähre fährt um 12:30 Uhr ab.",
            "Morgen regnet es wahrscheinlich.",
        ],
        [
            "A cat sat on the mat.",
            "Heute Morgen war es in Berlin kalt.",
            "Am Dienstag genehmigte der Rat den neuen Haushalt.",
            "Nächste Woche sehen wir uns wieder.",
            "Sie machte das Fenster auf und hörte dem Regen zu.",
            "Im letzten Jahr sind die Preise stark gestiegen.",
            "Die Nordstraße ist gesperrt.",
            "Er sagte \"Danke\" und ging.",
            "Die Fähre legt pünktlich um 12:30 Uhr ab.",
            "Es wird morgen wohl regnen.",
        ],
    ],
}

CHAR = {
    "name": "en-zh",
    "tokenize": "char",
    "hyps": [
        "博物馆两年后重新开放。",
        "我明天打电话给你。",
        "火车晚了一个小时。",
        "老人对孩子们微笑。",
        "今天天气很好，我们去公园吧！",
        "他在北京工作了三年。",
        "这本书非常有意思。",
        "请把门关上。",
        "会议推迟到下周二。",
        "价格上涨了10%。",
    ],
    "refs": [
        [
            "博物馆在两年后重新开放。",
            "我明天给你打电话。",
            "火车晚点了一个小时。",
            "老人对孩子们笑了笑。",
            "今天天气很好，我们去公园吧。",
            "他在北京工作三年了。",
            "这本书很有趣。",
            "请关门。",
            "会议被推迟到下星期二。",
            "价格上涨了百分之十。",
        ],
    ],
}


def fixture(spec):
    bleu = BLEU(tokenize=spec["tokenize"])
    chrf = CHRF(word_order=2)
    b = bleu.corpus_score(spec["hyps"], spec["refs"])
    c = chrf.corpus_score(spec["hyps"], spec["refs"])
    bleu_lc = BLEU(tokenize=spec["tokenize"], lowercase=True).corpus_score(spec["hyps"], spec["refs"])
    segs = []
    for i, h in enumerate(spec["hyps"]):
        rs = [r[i] for r in spec["refs"]]
        segs.append({
            "bleu_add1": BLEU(tokenize=spec["tokenize"], smooth_method="add-k", smooth_value=1,
                              effective_order=False).sentence_score(h, rs).score,
            "chrfpp": chrf.sentence_score(h, rs).score,
        })
    return {
        "name": spec["name"],
        "tokenize": spec["tokenize"],
        "sacrebleu_version": sacrebleu.__version__,
        "hyps": spec["hyps"],
        "refs": spec["refs"],
        "bleu": b.score,
        "bleu_sys_len": b.sys_len,
        "bleu_ref_len": b.ref_len,
        "bleu_counts": b.counts,
        "bleu_totals": b.totals,
        "bleu_lowercase": bleu_lc.score,
        "chrfpp": c.score,
        "segments": segs,
    }


if __name__ == "__main__":
    for spec, out in ((LATIN, "tests/fixtures/textmetrics_latin.json"),
                      (CHAR, "tests/fixtures/textmetrics_char.json")):
        with open(out, "w", encoding="utf-8") as f:
            json.dump(fixture(spec), f, ensure_ascii=False, indent=2)
            f.write("\n")
