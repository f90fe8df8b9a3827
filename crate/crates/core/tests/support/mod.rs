pub mod prune_oracle;
