//! Bundled figure-reproduction scenarios, compiled into the binary.

use crate::scenario::{parse, Scenario};
use crate::CliError;

pub struct Bundled {
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(Bundled { name: $name, text: include_str!(concat!("../scenarios/", $name, ".toml")) }),*]
    };
}

pub const BUNDLED: &[Bundled] = bundled![
    "fig1b", "fig1c", "fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b", "fig4b", "fig4c", "fig4d", "figS1", "figS2",
    "figS4bc", "budget", "drive",
];

pub fn find(name: &str) -> Option<&'static Bundled> {
    BUNDLED.iter().find(|b| b.name == name)
}

impl Bundled {
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        parse(self.text)
    }
}
