//! Human-readable documentation of the config schema and CSV artifact
//! columns, printed by the --schema flag.

pub const SCHEMA_TEXT: &str = r#"quadflow config schema (JSON, version 1)
=========================================

Top-level object; unknown keys are rejected.

  version       integer, must be 1
  n             degrees of freedom (>= 1)
  hbar          positive float (default 1.0)
  hamiltonian   one of:
                  {"type": "preset", "name": "harmonic" | "free" | "inverted"}
                  {"type": "constant", "g": M, "l": M, "k": M}
                  {"type": "piecewise", "breaks": [t0 < t1 < ...],
                   "pieces": [{"g": M, "l": M, "k": M}, ...]}
                M is an n x n row-major nested array; g and k symmetric.
                H(q,p) = (1/2) G q.q + L q.p + (1/2) K p.p
  time          {"start": t0, "stop": t1, "min_nodes": int (default 800)}
  state         optional; default is the ground Gaussian at the origin.
                {"center_q": [..n..], "center_p": [..n..],
                 "gamma_re": M (optional, default 0),
                 "gamma_im": M (optional, default I; must be positive definite)}
  outputs       array drawn from: "flow", "state-path", "wigner", "symbol",
                "index", "matrix-elements", "verify" (default: empty)
  samples       optional row count for CSV time series (default 64)
  wigner        optional {"half_width": float (3.0), "points": int (41)}
  seed          optional seed for randomized verify checks

Artifacts written by `run <config> -o <dir>`
--------------------------------------------

manifest.json      always written: config echo, file list, tolerances,
                   and per-check pass/fail results.

flow.csv           t, f00, f01, ... (row-major 2n x 2n symplectic matrix F_t;
                   coordinates ordered q1..qn, p1..pn)

state_path.csv     t, q1..qn, p1..pn (center), amp_re, amp_im (complex
                   amplitude with branch-continuous square root),
                   gamma_re00..., gamma_im00... (row-major n x n covariance)

wigner.csv         q, p, w — Wigner function at the final time on a
                   points x points lattice of half-width `wigner.half_width`
                   around the propagated center, sliced through the first
                   (q, p) plane at the center of the remaining coordinates.

symbol.json        endpoint Weyl symbols: the contravariant Gaussian symbol
                   with its winding index, and either the covariant Gaussian
                   symbol (regular case) or the Dirac-decorated symbol
                   (eigenvalue-1 case).

index.json         winding-index report: nu, raw windings per epsilon,
                   epsilon schedule, det(1+F).

winding.csv        t, delta_re, delta_im, arg — the tracked determinant and
                   its accumulated argument along the path (smallest epsilon).

matrix_elements.csv zq, zp, xq, xp, re, im — closed-form coherent-state
                   matrix elements <phi_{z+X}|R phi_z> on a probe panel
                   (first plane; remaining coordinates zero).

Exit status: 0 success; 1 numerical/runtime failure; 2 config error.
Environment: QUADFLOW_THREADS caps worker threads (currently all kernels
are single-threaded dense linear algebra; the variable is validated and
reserved).
"#;
