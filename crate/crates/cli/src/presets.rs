//! Figure-reproduction and search presets shipped with the binary.

use crate::config::RunConfig;
use crate::CliError;

/// `(name, TOML text)` for every preset.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig2a", include_str!("../presets/fig2a.toml")),
    ("fig2a-oa40", include_str!("../presets/fig2a-oa40.toml")),
    ("fig2b", include_str!("../presets/fig2b.toml")),
    ("fig2b-oa40", include_str!("../presets/fig2b-oa40.toml")),
    ("fig2c", include_str!("../presets/fig2c.toml")),
    ("fig2c-oa40", include_str!("../presets/fig2c-oa40.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig3-oc40", include_str!("../presets/fig3-oc40.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig4-oc40", include_str!("../presets/fig4-oc40.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig5-oc40", include_str!("../presets/fig5-oc40.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig6-oc40", include_str!("../presets/fig6-oc40.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("fig7-oc40", include_str!("../presets/fig7-oc40.toml")),
    ("fig8-156.5", include_str!("../presets/fig8-156.5.toml")),
    ("fig8-160", include_str!("../presets/fig8-160.toml")),
    ("fig8-180", include_str!("../presets/fig8-180.toml")),
    ("fig9-158", include_str!("../presets/fig9-158.toml")),
    ("fig9-160", include_str!("../presets/fig9-160.toml")),
    ("fig9-180", include_str!("../presets/fig9-180.toml")),
    ("fig10a", include_str!("../presets/fig10a.toml")),
    ("fig10b", include_str!("../presets/fig10b.toml")),
    ("opt-omega-a", include_str!("../presets/opt-omega-a.toml")),
    ("opt-temperature", include_str!("../presets/opt-temperature.toml")),
    ("opt-theta", include_str!("../presets/opt-theta.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn load(name: &str) -> Result<RunConfig, CliError> {
    let text = text(name).ok_or_else(|| {
        CliError::Config(format!("unknown preset `{name}` (available: {})", names().collect::<Vec<_>>().join(", ")))
    })?;
    RunConfig::from_toml_str(text, None)
}
