//! Small numerical building blocks.

pub mod banded;
pub mod fd;
pub mod quad;
pub mod roots;
pub mod spline;
