//! Library surface for the sweep/figure front end.
