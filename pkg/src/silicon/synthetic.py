"""Synthetic stand-in for the human dataset, for offline demos and tests.

The records follow the human CSV schema but are simulated; they carry no
information about any real respondent.
"""

from __future__ import annotations

import numpy as np

from .study import DemographicProfile, ParticipantRecord, builtin_scales

GENDERS = ("woman", "man", "non-binary")
COUNTRIES = ("United States", "Canada", "United Kingdom", "Germany", "Australia")
EDUCATION = ("High school", "Some college", "Bachelor's degree", "Master's degree", "Doctorate")
ETHNICITY = ("White", "Black or African American", "Asian", "Hispanic or Latino", "Multiracial")
INCOME = ("Under $25,000", "$25,000-$49,999", "$50,000-$99,999", "$100,000 or more")
POLITICS = ("Strongly liberal", "Moderately liberal", "Neutral", "Moderately conservative",
            "Strongly conservative")


def make_participants(n: int = 85, seed: int = 0, coupling: float = 0.3,
                      bjw_ceiling: int = 33) -> list[ParticipantRecord]:
    """``n`` complete records; ``coupling`` links the BJW and Gut Feelings latents.

    BJW sums are capped at ``bjw_ceiling`` so that an upward shift of the
    scores stays inside the scale bounds.
    """
    rng = np.random.default_rng(seed)
    bjw, gf = builtin_scales()
    records = []
    for k in range(n):
        shared = rng.standard_normal()
        z_bjw = np.sqrt(coupling) * shared + np.sqrt(1 - coupling) * rng.standard_normal()
        z_gf = np.sqrt(coupling) * shared + np.sqrt(1 - coupling) * rng.standard_normal()

        items = np.clip(np.rint(3.4 + 0.9 * z_bjw + 0.8 * rng.standard_normal(6)), 1, 6).astype(int)
        while items.sum() > bjw_ceiling:
            items[int(np.argmax(items))] -= 1
        ea = int(np.clip(np.rint(7.0 + 0.6 * z_gf + 1.2 * rng.standard_normal()), 1, 10))
        aa = int(np.clip(np.rint(7.2 - 0.6 * z_gf + 1.2 * rng.standard_normal()), 1, 10))

        responses = {(bjw.scale_id, item.item_id): int(v) for item, v in zip(bjw.items, items)}
        responses[(gf.scale_id, "gf_european_americans")] = ea
        responses[(gf.scale_id, "gf_african_americans")] = aa
        demo = DemographicProfile(
            age=int(rng.integers(18, 80)),
            gender=str(rng.choice(GENDERS, p=[0.55, 0.42, 0.03])),
            country_residence=str(rng.choice(COUNTRIES)),
            education=str(rng.choice(EDUCATION)),
            ethnicity=str(rng.choice(ETHNICITY)),
            income=str(rng.choice(INCOME)),
            political_identity=str(rng.choice(POLITICS)),
        )
        records.append(ParticipantRecord(f"P{k + 1:03d}", demo, responses))
    return records
