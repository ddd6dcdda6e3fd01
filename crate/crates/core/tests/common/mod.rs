pub mod qp_oracle;
