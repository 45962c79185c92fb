//! Built-in figure-reproduction recipes, embedded so the binary can run
//! them from anywhere. The same files are checked in under `docs/recipes/`.

pub struct Recipe {
    pub name: &'static str,
    pub description: &'static str,
    pub source: &'static str,
}

pub const RECIPES: &[Recipe] = &[
    Recipe {
        name: "fig3",
        description: "Walker-star grid baseline vs density-matched Poisson model",
        source: include_str!("../../../../docs/recipes/fig3.cfg"),
    },
    Recipe {
        name: "fig4",
        description: "exact/approximated coverage vs Monte Carlo across shadowing presets",
        source: include_str!("../../../../docs/recipes/fig4.cfg"),
    },
    Recipe {
        name: "fig5",
        description: "two-tier closed form vs exact coverage across satellite altitudes",
        source: include_str!("../../../../docs/recipes/fig5.cfg"),
    },
    Recipe {
        name: "fig6",
        description: "coverage vs threshold across bias-factor ratios",
        source: include_str!("../../../../docs/recipes/fig6.cfg"),
    },
    Recipe {
        name: "fig7",
        description: "terrestrial association proportion vs terrestrial bias",
        source: include_str!("../../../../docs/recipes/fig7.cfg"),
    },
    Recipe {
        name: "fig8",
        description: "terrestrial association proportion vs density ratio",
        source: include_str!("../../../../docs/recipes/fig8.cfg"),
    },
];

pub fn find(name: &str) -> Option<&'static Recipe> {
    RECIPES.iter().find(|r| r.name == name)
}
