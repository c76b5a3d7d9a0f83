//! Dot parsing, random walks, trace formats and the dynamic-arbitration
//! transform.

pub mod arbitration;
pub mod dot;
pub mod prefix;
pub mod spot;
pub mod walk;

pub use arbitration::{dynamic_arbitration_transform, GrantCap};
pub use dot::{parse_dot, write_dot, DotError};
pub use prefix::{to_prefix_closed, PrefixClosedSample, SampleError};
pub use spot::{parse_spot, serialize_spot, SpotError};
pub use walk::{random_walk, random_walk_parallel, WalkConfig};
