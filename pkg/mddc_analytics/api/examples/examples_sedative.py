"""
Sedative-like fixture recipe: 1000 AEs and an Other row against ten sedatives and Other.
"""

sedative_drugs = ["Alprazolam", "Clonazepam", "Diazepam", "Eszopiclone", "Lorazepam", \
    "Midazolam", "Oxazepam", "Temazepam", "Triazolam", "Zolpidem", "Other"]

sedative1000_recipe = {
    "name": "synthetic_sedative1000",
    "description": "1000 AEs plus Other against ten sedatives plus Other",
    "row_names": ["Somnolence", "Sedation", "Amnesia", "Respiratory depression",
                  "Confusional state", "Drug dependence", "Sleep walking"]
                 + [f"AE_{k:04d}" for k in range(8, 1001)] + ["Other"],
    "col_names": sedative_drugs,
    "row_weights": [k ** -0.85 for k in range(1, 1001)] + [80.0],
    "col_weights": [0.030, 0.022, 0.018, 0.006, 0.020, 0.011, 0.002, 0.007, 0.003, \
        0.025, 0.856],
    "total": 31459817,
    "signals": {("Sleep walking", "Zolpidem"): 4.0, ("Respiratory depression", \
        "Midazolam"): 3.0},
    "ae_clusters": None,
    "rho": 0.0,
    "seed": 1000,
}
