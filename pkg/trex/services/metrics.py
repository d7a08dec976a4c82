def fdp_tpp(selected, truth):
    """
    Realized false discovery and true positive proportions.

    Both denominators are floored at one, so empty sets give zeros.
    """
    selected = set(selected)
    truth = set(truth)
    fdp = len(selected - truth) / max(1, len(selected))
    tpp = len(truth & selected) / max(1, len(truth))
    return fdp, tpp
