//! Analysis and simulation toolkit for a viscoelastic liquid-cooled
//! series-elastic actuator (VLCA) and a two-joint testbed driven by it.

pub mod elastomat;
pub mod integrate;
pub mod lintf;
pub mod powertherm;
pub mod simkit;
pub mod testbed;
pub mod vlca;
