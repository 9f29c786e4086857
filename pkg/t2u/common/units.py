# Free-space propagation speed used everywhere (m/s).
SPEED_OF_LIGHT = 3.0e8


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def dbm_to_watts(value_dbm: float) -> float:
    return 10.0 ** ((value_dbm - 30.0) / 10.0)
