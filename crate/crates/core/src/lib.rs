//! Magic-wavelength optical traps: atomic line catalogs, dynamic
//! polarizabilities and magic wavelengths, trap mechanics, lattice-clock
//! line shapes, and cavity QED with a trapped atom.

pub mod angular;
pub mod cavityqed;
pub mod atomdata;
pub mod constants;
pub mod fieldtrap;
pub mod polarizability;
pub mod clockspec;
pub mod roots;

pub use angular::HalfInt;
pub use atomdata::{bundled_species, load_species, parse_species, Species};
pub use fieldtrap::Polarization;
