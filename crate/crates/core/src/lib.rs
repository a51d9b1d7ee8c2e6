pub mod basisrewrite;
pub mod estimsim;
pub mod fields;
pub mod normalform;
pub mod pipeline;
pub mod specfile;
pub mod symcore;
