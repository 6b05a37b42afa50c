# Generated by Django 5.2.6 on 2026-10-19 09:30

import django.core.validators
import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ConvergenceRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('element', models.CharField(choices=[('vem31', 'VEM31 (k=2)'), ('vem32', 'VEM32 (k=3)')], max_length=10)),
                ('mesh_type', models.CharField(choices=[('triangles', 'Uniform triangles'), ('voronoi', 'Random Voronoi')], max_length=20)),
                ('sizes', models.CharField(help_text='Comma separated N or cell counts', max_length=200)),
                ('nu', models.FloatField(validators=[django.core.validators.MinValueValidator(0.0), django.core.validators.MaxValueValidator(0.5)])),
                ('bending_rigidity', models.FloatField(validators=[django.core.validators.MinValueValidator(0.0)])),
                ('seed', models.IntegerField(default=0)),
                ('lloyd_iters', models.PositiveIntegerField(default=0)),
                ('deterministic', models.BooleanField(default=False)),
                ('interpolant', models.BooleanField(default=False, help_text='Errors of the interpolant, no solve')),
                ('slope_l2', models.FloatField(blank=True, null=True)),
                ('slope_h1', models.FloatField(blank=True, null=True)),
                ('slope_h2', models.FloatField(blank=True, null=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'verbose_name': 'Convergence run',
                'verbose_name_plural': 'Convergence runs',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='ErrorRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('position', models.PositiveIntegerField()),
                ('h', models.FloatField()),
                ('h_mean', models.FloatField()),
                ('n_dofs', models.PositiveIntegerField()),
                ('rel_l2', models.FloatField()),
                ('rel_h1', models.FloatField()),
                ('rel_h2', models.FloatField()),
                ('residual', models.FloatField(default=0.0)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='rows', to='plates.convergencerun')),
            ],
            options={
                'ordering': ['run', 'position'],
                'unique_together': {('run', 'position')},
            },
        ),
    ]
