from fractions import Fraction


class MetricsError(ValueError):
    pass


def p_collision(collisions: int, cs_total: int) -> Fraction:
    if cs_total <= 0:
        raise MetricsError("p_collision needs at least one critical section")
    if not 0 <= collisions <= cs_total:
        raise MetricsError(f"collision count {collisions} outside [0, {cs_total}]")
    return Fraction(collisions, cs_total)


def collision_rate(collisions: int, cs_total: int) -> Fraction:
    """Collisions per critical section; contacts outside any section can push it past 1."""
    if cs_total <= 0:
        raise MetricsError("collision rate needs at least one critical section")
    if collisions < 0:
        raise MetricsError(f"collision count {collisions} is negative")
    return Fraction(collisions, cs_total)


def mlr(n_s: int, n_a: int) -> Fraction:
    """Motion loss rate (N_s - N_a) / N_s."""
    if n_s <= 0:
        raise MetricsError("mlr needs at least one sent motion loop")
    if n_a < 0:
        raise MetricsError(f"executed loop count {n_a} is negative")
    if n_a > n_s:
        raise MetricsError(f"executed loops {n_a} exceed sent loops {n_s}; peak counting is off")
    return Fraction(n_s - n_a, n_s)


def format_scaled(value: Fraction, scale: int = 1000, digits: int = 6) -> str:
    """Fixed-point rendering of value·scale, rounded half-up on the exact rational."""
    scaled = value * scale * 10 ** digits
    units = (scaled.numerator * 2 + scaled.denominator) // (2 * scaled.denominator)
    whole, frac = divmod(units, 10 ** digits)
    return f"{whole}.{frac:0{digits}d}" if digits else str(whole)
