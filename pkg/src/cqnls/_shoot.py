"""Pure-Python trajectory classifier for the radial ground-state ODE.

This is the fallback twin of the compiled classifier in _shootfast.pyx; both
implement the same Dormand-Prince 5(4) loop with the same coefficients and
acceptance rule, so they produce the same overshoot/undershoot brackets.
Scalar arithmetic throughout: the per-step cost must stay tiny because sweeps
classify thousands of trajectories.

Outcome codes: 1 = overshoot (P crossed zero), 0 = undershoot (P' turned
positive while P > 0), 2 = decayed (reached r_end still positive and falling).
"""

OVERSHOOT = 1
UNDERSHOOT = 0
DECAYED = 2


def classify(p0, omega, r_end, rtol=1e-10, atol=1e-14):
    """Integrate P'' + (2/r)P' = (omega - P^2 + P^4) P from the series start
    at r=1e-4 with P(0)=p0 and report how the trajectory exits."""
    r0 = 1e-4
    w0 = omega - p0 * p0 + p0 ** 4
    P = p0 * (1.0 + w0 * r0 * r0 / 6.0)
    Q = p0 * w0 * r0 / 3.0
    r = r0
    h = 1e-3

    k1P = Q
    k1Q = (omega - P * P + P ** 4) * P - 2.0 * Q / r

    while True:
        if h > 0.5:
            h = 0.5
        if r + h > r_end:
            h = r_end - r

        # Dormand-Prince 5(4), FSAL
        rr = r + 0.2 * h
        yP = P + h * 0.2 * k1P
        yQ = Q + h * 0.2 * k1Q
        k2P = yQ
        k2Q = (omega - yP * yP + yP ** 4) * yP - 2.0 * yQ / rr

        rr = r + 0.3 * h
        yP = P + h * (0.075 * k1P + 0.225 * k2P)
        yQ = Q + h * (0.075 * k1Q + 0.225 * k2Q)
        k3P = yQ
        k3Q = (omega - yP * yP + yP ** 4) * yP - 2.0 * yQ / rr

        rr = r + 0.8 * h
        yP = P + h * ((44.0 / 45.0) * k1P - (56.0 / 15.0) * k2P + (32.0 / 9.0) * k3P)
        yQ = Q + h * ((44.0 / 45.0) * k1Q - (56.0 / 15.0) * k2Q + (32.0 / 9.0) * k3Q)
        k4P = yQ
        k4Q = (omega - yP * yP + yP ** 4) * yP - 2.0 * yQ / rr

        rr = r + (8.0 / 9.0) * h
        yP = P + h * ((19372.0 / 6561.0) * k1P - (25360.0 / 2187.0) * k2P
                      + (64448.0 / 6561.0) * k3P - (212.0 / 729.0) * k4P)
        yQ = Q + h * ((19372.0 / 6561.0) * k1Q - (25360.0 / 2187.0) * k2Q
                      + (64448.0 / 6561.0) * k3Q - (212.0 / 729.0) * k4Q)
        k5P = yQ
        k5Q = (omega - yP * yP + yP ** 4) * yP - 2.0 * yQ / rr

        rr = r + h
        yP = P + h * ((9017.0 / 3168.0) * k1P - (355.0 / 33.0) * k2P
                      + (46732.0 / 5247.0) * k3P + (49.0 / 176.0) * k4P
                      - (5103.0 / 18656.0) * k5P)
        yQ = Q + h * ((9017.0 / 3168.0) * k1Q - (355.0 / 33.0) * k2Q
                      + (46732.0 / 5247.0) * k3Q + (49.0 / 176.0) * k4Q
                      - (5103.0 / 18656.0) * k5Q)
        k6P = yQ
        k6Q = (omega - yP * yP + yP ** 4) * yP - 2.0 * yQ / rr

        P5 = P + h * ((35.0 / 384.0) * k1P + (500.0 / 1113.0) * k3P + (125.0 / 192.0) * k4P
                      - (2187.0 / 6784.0) * k5P + (11.0 / 84.0) * k6P)
        Q5 = Q + h * ((35.0 / 384.0) * k1Q + (500.0 / 1113.0) * k3Q + (125.0 / 192.0) * k4Q
                      - (2187.0 / 6784.0) * k5Q + (11.0 / 84.0) * k6Q)
        k7P = Q5
        k7Q = (omega - P5 * P5 + P5 ** 4) * P5 - 2.0 * Q5 / rr

        eP = h * ((35.0 / 384.0 - 5179.0 / 57600.0) * k1P
                  + (500.0 / 1113.0 - 7571.0 / 16695.0) * k3P
                  + (125.0 / 192.0 - 393.0 / 640.0) * k4P
                  + (-2187.0 / 6784.0 + 92097.0 / 339200.0) * k5P
                  + (11.0 / 84.0 - 187.0 / 2100.0) * k6P
                  - (1.0 / 40.0) * k7P)
        eQ = h * ((35.0 / 384.0 - 5179.0 / 57600.0) * k1Q
                  + (500.0 / 1113.0 - 7571.0 / 16695.0) * k3Q
                  + (125.0 / 192.0 - 393.0 / 640.0) * k4Q
                  + (-2187.0 / 6784.0 + 92097.0 / 339200.0) * k5Q
                  + (11.0 / 84.0 - 187.0 / 2100.0) * k6Q
                  - (1.0 / 40.0) * k7Q)

        sP = atol + rtol * (abs(P) if abs(P) > abs(P5) else abs(P5))
        sQ = atol + rtol * (abs(Q) if abs(Q) > abs(Q5) else abs(Q5))
        e1 = eP / sP
        e2 = eQ / sQ
        err = (0.5 * (e1 * e1 + e2 * e2)) ** 0.5

        if err <= 1.0:
            r = r + h
            P = P5
            Q = Q5
            k1P = k7P
            k1Q = k7Q
            if P < 0.0:
                return OVERSHOOT, r
            if Q > 0.0:
                return UNDERSHOOT, r
            if r >= r_end - 1e-12:
                return DECAYED, r

        if err == 0.0:
            fac = 5.0
        else:
            fac = 0.9 * err ** -0.2
            if fac < 0.2:
                fac = 0.2
            elif fac > 5.0:
                fac = 5.0
        h *= fac
        if h < 1e-14:
            # step collapse: treat as undershoot-side stall (never seen in
            # practice; keeps the bisection loop finite)
            return UNDERSHOOT, r
