"""
Beta-blocker-like fixture recipe: 500 AEs and an Other row against eight beta blockers
and Other, with a grand total near 7.7e7.
"""

betablocker_drugs = ["Acebutolol", "Atenolol", "Bisoprolol", "Carvedilol", "Metoprolol", \
    "Nadolol", "Propranolol", "Timolol", "Other"]

betablocker_head = ["Pain", "Fatigue", "Nausea", "Dizziness", "Dyspnoea", "Headache", \
    "Fall", "Bradycardia", "Hypotension", "Drug ineffective", "Malaise", "Asthenia", \
    "Diarrhoea", "Oedema peripheral", "Chest pain", "Liver disorder"]

betablocker500_recipe = {
    "name": "synthetic_betablocker500",
    "description": "500 AEs plus Other against eight beta blockers plus Other",
    "row_names": betablocker_head + [f"AE_{k:03d}" for k in range(17, 501)] + ["Other"],
    "col_names": betablocker_drugs,
    "row_weights": [k ** -0.8 for k in range(1, 501)] + [60.0],
    "col_weights": [3582, 455, 977, 110, 457, 307, 166, 348, 1074063],
    "total": 77132540,
    "signals": {("Pain", "Acebutolol"): 3.0, ("Fatigue", "Carvedilol"): 3.0,
                ("Liver disorder", "Atenolol"): 4.0},
    "ae_clusters": None,
    "rho": 0.0,
    "seed": 500,
}
