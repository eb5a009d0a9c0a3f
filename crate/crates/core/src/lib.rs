pub mod graphs;
pub mod polytopes;
pub mod termorders;
pub mod catp;
pub mod toric;
