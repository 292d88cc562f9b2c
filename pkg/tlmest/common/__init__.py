# Shared configuration, errors and observability helpers
