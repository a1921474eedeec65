from typing import Any, Dict, List, Sequence


def print_h_bar():
    print("--------------------------------------------------------------------")


def format_value(value: Any) -> str:
    """Floats with 17 significant digits so printed numbers round-trip"""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def parse_key_value(items: Sequence[str]) -> Dict[str, str]:
    """['radius=2', 'sides=5'] -> {'radius': '2', 'sides': '5'}"""
    params = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"Expected key=value, got '{item}'")
        params[key.strip()] = value.strip()
    return params


def parse_vector(text: str) -> List[float]:
    """'1,2.5,-3' -> [1.0, 2.5, -3.0]"""
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise ValueError(f"Expected comma-separated numbers, got '{text}'")
