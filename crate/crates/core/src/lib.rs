//! Irreducible representations of `C(SU_q(n+1))` and of its crystal limit
//! `q -> 0`, realised as exact symbolic operators on tensor powers of
//! `ℓ²(ℕ)` and certified through finite sections.
//!
//! Layers, bottom up: [`coxeter`] (permutations, reduced words, Bruhat
//! order), [`fock`] (shift-algebra operators, sections, norm bounds),
//! [`coalgebra`] (coproduct index paths), [`reps`] (generator images),
//! [`crystal`] (limit deficits, braid and factorization checks),
//! [`soibelman`] (block sums over torus grids) and [`spectrum`]
//! (representation labels and their specialization order).

pub mod coalgebra;
pub mod coxeter;
pub mod crystal;
pub mod fock;
pub mod reps;
pub mod soibelman;
pub mod spectrum;
