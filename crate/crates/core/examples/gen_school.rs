//! Regenerate the bundled synthetic school files.

use std::fs;
use std::path::Path;

fn main() -> rootstat::Result<()> {
    let data = rootstat::fixtures::school()?;
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    fs::write(dir.join("school_edges.txt"), data.edge_list())?;
    fs::write(dir.join("school_covariates.csv"), data.covariate_csv())?;
    println!(
        "wrote {} vertices, {} edges",
        data.graph.n(),
        data.graph.edge_count()
    );
    Ok(())
}
