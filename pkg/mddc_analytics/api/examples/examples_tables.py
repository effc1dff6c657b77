"""
Small tables used in tests and in documentation of mddc analytics.
"""

# rows AEs, columns drugs
diagonal_2x2 = {
    "counts": [[2, 0], [0, 2]],
    "row_names": ["Nausea", "Headache"],
    "col_names": ["DrugA", "DrugB"],
}

fisher_2x2 = {
    "counts": [[4, 0], [0, 4]],
    "row_names": ["Nausea", "Headache"],
    "col_names": ["DrugA", "DrugB"],
}

proportional_3x3 = {
    "counts": [[10, 20, 30], [20, 40, 60], [30, 60, 90]],
    "row_names": ["Pain", "Fatigue", "Nausea"],
    "col_names": ["DrugA", "DrugB", "Other"],
}

betablocker_head_csv = """,Acebutolol,Atenolol,Bisoprolol,Carvedilol,Metoprolol,Nadolol,Propranolol,Timolol,Other
Pain,3582,455,977,110,457,307,166,348,1074063
Fatigue,512,381,822,1420,911,122,304,217,834455
Nausea,498,377,639,521,702,101,288,240,790120
"""

# idx/AE layout of cluster index files
ae_idx_example = {
    "idx": [1, 1, 2],
    "AE": ["Pain", "Fatigue", "Nausea"],
}
