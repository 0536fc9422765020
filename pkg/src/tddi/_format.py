"""Float formatting shared by the CSV and JSON writers."""


def fmt(x: float) -> str:
    """Nine significant digits; the golden-file format."""
    return format(float(x), ".9g")
