"""Shared synthetic datasets for tests."""
from __future__ import annotations

import json

SEASONS = ("Spring", "Summer", "Autumn", "Winter")

# Engineered so that (Location=JPN, Brand=PlayStation4 (PS4), Year=2021),
# broken down by Season, sums to 1000 with Autumn at exactly 524.
_JPN_PS4_2021 = {"Spring": 160, "Summer": 158, "Autumn": 524, "Winter": 158}

CONSOLE_HINTS = {
    "columns": [
        {"name": "Season", "kind": "categorical", "ordinal_order": list(SEASONS)},
        {"name": "Year", "kind": "categorical", "ordinal": True},
    ]
}


def console_csv() -> str:
    """Small console-sales table: 5 categorical columns and one measure."""
    lines = ["Company,Location,Brand,Season,Year,Sales"]
    brands = (("Sony", "PlayStation4 (PS4)"), ("Microsoft", "XboxOne (XOne)"))
    for company, brand in brands:
        for location in ("JPN", "USA"):
            for year in ("2020", "2021"):
                for si, season in enumerate(SEASONS):
                    if (location, brand, year) == ("JPN", "PlayStation4 (PS4)", "2021"):
                        sales = _JPN_PS4_2021[season]
                    else:
                        # arbitrary but deterministic mid-range values
                        sales = 40 + (len(company) * 13 + len(location) * 7 + int(year) % 7 + si * 11) % 97
                    lines.append(f'{company},{location},"{brand}",{season},{year},{sales}')
    return "\n".join(lines) + "\n"


def console_hints_json() -> str:
    return json.dumps(CONSOLE_HINTS)
