"""The fixed convention choices of the engine, as data, plus their hash.

Every report embeds the hash so that two reports are comparable only when
they were produced under identical conventions.
"""

from __future__ import annotations

import hashlib
import json

CONVENTIONS = {
    "coefficients": "exact rationals",
    "derivative": "left",
    "bracket": "biderivation with {p,q} = +1 on every conjugate pair",
    "bracket_formula": ("{f,g} = sum_i (-1)^((f+e)(k_i+e)+k_i(1+e)) d_p f d_q g"
                        " - (-1)^((f+e)k_i) d_q f d_p g"),
    "jacobiator": "derived bracket of {Delta,Delta}/2",
    "shuffle_sign": "Koszul sign over epsilon-shifted parities, k from 0 to n",
    "derived_restriction": "substitute 0 for every momentum variable",
    "interior_product": "(-1)^X~ times the letter-for-letter derivative word",
    "cartan_bracket_identities": "i_[[X,Y]] = -[i_X,L_Y]; L_[[X,Y]] = -[L_X,L_Y]",
    "kb_mechanism": "Delta_P^2 = -(1/2) L_[[P,P]]",
    "deformation": "eta-degree-k component scaled by hbar^k",
    "ascii_names": {"eta": "eta_", "xi": "xi_", "pi (upper)": "pi_", "pi (lower)": "pim_",
                    "p": "p_", "x*": "xs_", "e": "e_", "e*": "es_",
                    "eta (upper)": "etau_", "eta*": "etas_", "nu": "nu_",
                    "theta": "theta_", "xi (tangent)": "xit_"},
}


def convention_hash() -> str:
    blob = json.dumps(CONVENTIONS, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
