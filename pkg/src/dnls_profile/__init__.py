"""Self-similar profile solutions of the derivative nonlinear Schrodinger equation.

The PDE  i u_t + u_xx + i (|u|^2 u)_x = 0  admits solutions of the form
u(t, x) = t^{-1/4} Q(t^{-1/2} x).  The complex profile Q factors as
A e^{i phi}, where the real amplitude A obeys the second-order equation

    A'' + (y^2/16) A = (y/4) A^3 - (3/16) A^5

and the phase is slaved to the amplitude through phi' = y/4 - (3/4) A^2.
This package integrates the amplitude equation on both half-lines, verifies
the oscillation and energy estimates that control it, and recovers the
asymptotic amplitude/phase law, including its logarithmic phase correction,
by numerical fitting.

Modules
-------
profile_core
    Right-hand sides of every equation in play, plus local solutions near
    the origin (Taylor recurrence and Picard iteration).
integrator
    Adaptive embedded Runge-Kutta integration with quintic-Hermite dense
    output, bidirectional spans, and blowup/step-collapse detection.
linearized
    Closed-form solutions of the linearized equation g'' + (y^2/16) g = 0
    via quarter-order Bessel evaluations (ascending series plus
    large-argument expansion), an independent oracle for the integrator.
diagnostics
    Modified energies and their monotonicity statements, extrema sequences
    and oscillation inequality chains, decay-norm reports.
asymptotics
    Unit-frequency change of variables, polar decomposition, phase-law
    fitting, complex-profile reconstruction, PDE residual, and the secular
    Duhamel growth demonstration.
cli
    Reproducible command-line workflows (solve / fit / sweep / bessel /
    check / export) with deterministic CSV/JSON output.
"""

__version__ = "0.1.0"
