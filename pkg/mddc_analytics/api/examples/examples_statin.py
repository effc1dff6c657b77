"""
Statin-like fixture recipes: clustered muscle and kidney AEs against six statins.
Used by io_report.load_fixture and in tests.
"""

statin_drugs = ["Atorvastatin", "Fluvastatin", "Lovastatin", "Pravastatin", \
    "Rosuvastatin", "Simvastatin", "Other"]

# cluster id -> AEs; 1 muscle signs and symptoms, 2 muscle laboratory tests,
# 3 kidney injury
statin49_ae_clusters = {
    1: ["Rhabdomyolysis", "Myalgia", "Myopathy", "Muscular weakness", "Muscle spasms",
        "Musculoskeletal pain", "Muscle disorder", "Myositis", "Necrotising myositis",
        "Immune-mediated myositis", "Muscle atrophy", "Muscle fatigue", "Muscle injury",
        "Muscle necrosis", "Muscle swelling", "Muscle tightness", "Muscle twitching",
        "Musculoskeletal discomfort", "Musculoskeletal stiffness", "Myoglobinuria",
        "Myopathy toxic", "Polymyositis", "Dermatomyositis", "Muscle haemorrhage",
        "Muscle contracture", "Myalgia intercostal", "Muscle rupture"],
    2: ["Blood creatine phosphokinase increased", "Blood creatine phosphokinase abnormal",
        "Blood creatine phosphokinase MM increased", "Myoglobin blood increased",
        "Myoglobin blood present", "Myoglobin urine present", "Aldolase increased",
        "Aspartate aminotransferase increased", "Alanine aminotransferase increased",
        "Blood lactate dehydrogenase increased", "Transaminases increased",
        "Electromyogram abnormal", "Muscle enzyme increased", "Biopsy muscle abnormal"],
    3: ["Acute kidney injury", "Renal failure", "Renal impairment", "Renal tubular necrosis",
        "Chromaturia", "Blood creatinine increased", "Oliguria", "Anuria"],
}

statin49_ae_names = [ae for cluster in statin49_ae_clusters.values() for ae in cluster]

statin49_recipe = {
    "name": "synthetic_statin49",
    "description": "49 muscle and kidney AEs in three clusters against six statins "
                   "and Other; (Rhabdomyolysis, Atorvastatin) carries signal strength 4",
    "row_names": statin49_ae_names,
    "col_names": statin_drugs,
    "row_weights": [k ** -0.9 for k in range(1, 50)],
    "col_weights": [0.18, 0.03, 0.06, 0.07, 0.10, 0.16, 0.40],
    "total": 63976,
    "signals": {("Rhabdomyolysis", "Atorvastatin"): 4.0},
    "ae_clusters": statin49_ae_clusters,
    "rho": 0.5,
    "seed": 49,
}

statin101_ae_names = statin49_ae_names + [f"AE_{k:03d}" for k in range(50, 102)] + ["Other"]

statin101_recipe = {
    "name": "synthetic_statin101",
    "description": "101 AEs and an Other row against four statins and Other",
    "row_names": statin101_ae_names,
    "col_names": ["Atorvastatin", "Pravastatin", "Rosuvastatin", "Simvastatin", "Other"],
    "row_weights": [k ** -1.0 for k in range(1, 102)] + [3.0],
    "col_weights": [0.12, 0.05, 0.08, 0.10, 0.65],
    "total": 1268542,
    "signals": {("Rhabdomyolysis", "Simvastatin"): 3.0, ("Myalgia", "Atorvastatin"): 2.5},
    "ae_clusters": None,
    "rho": 0.0,
    "seed": 101,
}
